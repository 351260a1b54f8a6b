import org.junit.Test;

public class SwitchTest {

    private int score(char grade) {
        int points;
        switch (grade) {
            case 'A':
                points = 4;
                break;
            case 'B':
            case 'C':
                points = 2;
                break;
            default:
                points = 0;
        }
        return points;
    }

    @Test
    public void scoresGrades() {
        assertEquals(4, score('A'));
        assertEquals(2, score('C'));
        assertEquals(0, score('F'));
    }
}
